use std::fs;
use std::path::{Path, PathBuf};

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use ed25519_dalek::{SigningKey, VerifyingKey};
use rand_core::OsRng;
use serde::{Deserialize, Serialize};

/// A publishing identity: display name, optional ORCID and an Ed25519 key pair.
#[derive(Debug, Clone)]
pub struct Profile {
    pub name: String,
    pub orcid: Option<String>,
    signing_key: Option<SigningKey>,
    verifying_key: VerifyingKey,
}

#[derive(Debug, thiserror::Error)]
pub enum ProfileError {
    #[error("ORCID must look like https://orcid.org/0000-0000-0000-000X, got {0:?}")]
    InvalidOrcid(String),
    #[error("profile name must not be empty")]
    EmptyName,
    #[error("invalid key in {path}: {reason}")]
    BadKey { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Yaml { path: PathBuf, source: serde_yaml::Error },
}

/// On-disk profile document; key paths are relative to the profile file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orcid: Option<String>,
    pub private_key: PathBuf,
    pub public_key: PathBuf,
}

fn valid_orcid(orcid: &str) -> bool {
    let Some(id) = orcid.strip_prefix("https://orcid.org/") else {
        return false;
    };
    let groups: Vec<&str> = id.split('-').collect();
    groups.len() == 4
        && groups.iter().all(|g| g.len() == 4)
        && groups.iter().enumerate().all(|(i, g)| {
            g.chars().enumerate().all(|(j, c)| c.is_ascii_digit() || (i == 3 && j == 3 && c == 'X'))
        })
}

impl Profile {
    pub fn generate(name: impl Into<String>, orcid: Option<String>) -> Result<Self, ProfileError> {
        Self::from_signing_key(name, orcid, SigningKey::generate(&mut OsRng))
    }

    pub fn from_signing_key(name: impl Into<String>, orcid: Option<String>, key: SigningKey) -> Result<Self, ProfileError> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(ProfileError::EmptyName);
        }
        if let Some(o) = &orcid {
            if !valid_orcid(o) {
                return Err(ProfileError::InvalidOrcid(o.clone()));
            }
        }
        Ok(Profile { name, orcid, verifying_key: key.verifying_key(), signing_key: Some(key) })
    }

    /// A profile that can be attributed but cannot sign.
    pub fn public_only(name: impl Into<String>, orcid: Option<String>, key: VerifyingKey) -> Self {
        Profile { name: name.into(), orcid, signing_key: None, verifying_key: key }
    }

    pub fn signing_key(&self) -> Option<&SigningKey> {
        self.signing_key.as_ref()
    }

    pub fn verifying_key(&self) -> &VerifyingKey {
        &self.verifying_key
    }

    pub fn public_key_base64(&self) -> String {
        STANDARD.encode(self.verifying_key.as_bytes())
    }

    /// Writes `profile.yaml`, `id_ed25519` and `id_ed25519.pub` into `dir`
    /// and returns the profile file path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf, ProfileError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ProfileError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let private = dir.join("id_ed25519");
        let public = dir.join("id_ed25519.pub");
        if let Some(key) = &self.signing_key {
            fs::write(&private, STANDARD.encode(key.to_bytes()) + "\n").map_err(io(&private))?;
        }
        fs::write(&public, self.public_key_base64() + "\n").map_err(io(&public))?;
        let file = ProfileFile {
            name: self.name.clone(),
            orcid: self.orcid.clone(),
            private_key: "id_ed25519".into(),
            public_key: "id_ed25519.pub".into(),
        };
        let path = dir.join("profile.yaml");
        let text = serde_yaml::to_string(&file).map_err(|source| ProfileError::Yaml { path: path.clone(), source })?;
        fs::write(&path, text).map_err(io(&path))?;
        Ok(path)
    }

    /// Loads a profile file. A missing private key file yields a
    /// public-only profile.
    pub fn load(path: &Path) -> Result<Self, ProfileError> {
        let text = fs::read_to_string(path).map_err(|source| ProfileError::Io { path: path.into(), source })?;
        let file: ProfileFile =
            serde_yaml::from_str(&text).map_err(|source| ProfileError::Yaml { path: path.into(), source })?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let read_key = |p: &Path| -> Result<Option<[u8; 32]>, ProfileError> {
            let p = dir.join(p);
            let text = match fs::read_to_string(&p) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
                Err(source) => return Err(ProfileError::Io { path: p, source }),
            };
            let bytes = STANDARD
                .decode(text.trim())
                .map_err(|e| ProfileError::BadKey { path: p.clone(), reason: e.to_string() })?;
            let arr: [u8; 32] = bytes
                .try_into()
                .map_err(|_| ProfileError::BadKey { path: p.clone(), reason: "expected 32 bytes".into() })?;
            Ok(Some(arr))
        };
        match read_key(&file.private_key)? {
            Some(secret) => Self::from_signing_key(file.name, file.orcid, SigningKey::from_bytes(&secret)),
            None => {
                let public_path = dir.join(&file.public_key);
                let public = read_key(&file.public_key)?.ok_or_else(|| ProfileError::BadKey {
                    path: public_path.clone(),
                    reason: "neither private nor public key found".into(),
                })?;
                let key = VerifyingKey::from_bytes(&public)
                    .map_err(|e| ProfileError::BadKey { path: public_path, reason: e.to_string() })?;
                Ok(Self::public_only(file.name, file.orcid, key))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orcid_shape() {
        assert!(valid_orcid("https://orcid.org/0000-0002-1825-0097"));
        assert!(valid_orcid("https://orcid.org/0000-0002-1694-233X"));
        assert!(!valid_orcid("https://orcid.org/0000-0002-1694-23X3"));
        assert!(!valid_orcid("http://orcid.org/0000-0002-1825-0097"));
        assert!(!valid_orcid("https://orcid.org/0000-0002-1825"));
        assert!(Profile::generate("A", Some("orcid".into())).is_err());
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let p = Profile::generate("Alice", Some("https://orcid.org/0000-0002-1825-0097".into())).unwrap();
        let path = p.save(dir.path()).unwrap();
        let back = Profile::load(&path).unwrap();
        assert_eq!(back.name, "Alice");
        assert_eq!(back.public_key_base64(), p.public_key_base64());
        assert!(back.signing_key().is_some());

        fs::remove_file(dir.path().join("id_ed25519")).unwrap();
        let public = Profile::load(&path).unwrap();
        assert!(public.signing_key().is_none());
        assert_eq!(public.verifying_key(), p.verifying_key());
    }
}
