use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 over the given byte slices, truncated to `len` hex chars.
pub fn digest_hex(parts: &[&[u8]], len: usize) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update(part);
        // separator byte so ("ab","c") and ("a","bc") never collide
        hasher.update([0x1f]);
    }
    let full = hasher.finalize();
    let mut out = String::with_capacity(len);
    for byte in full.iter() {
        if out.len() >= len {
            break;
        }
        out.push_str(&format!("{byte:02x}"));
    }
    out.truncate(len);
    out
}
