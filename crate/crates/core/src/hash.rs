use sha2::{Digest, Sha256};

/// 64-bit content hash: the leading eight bytes of the SHA-256 digest.
pub fn content_hash(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

/// Lower-case, zero-padded hex form used in logs and tool results.
pub fn hash_hex(hash: u64) -> String {
    format!("{hash:016x}")
}
