//! Values produced by a standalone FNV-1a reference (unigram + bigram
//! signed hashing, D = 64) and frozen. Embeddings are stored as f64 bit
//! patterns; `*_RAW` are the integer bucket sums before normalization.

pub const TOKEN_FIXTURES: &[(&str, u64, usize, f64)] = &[
    ("select", 0xbd76100bd58c9c0d, 13, 1.0),
    ("from", 0x7f845078d7a5c0b5, 53, 1.0),
    ("group", 0xdc57e42946f6e08c, 12, -1.0),
    ("by", 0x08a64b07b54df8d4, 20, -1.0),
    ("zip", 0xce4e0a19876f9b74, 52, -1.0),
    ("gender", 0xa2032d71f130fec0, 0, 1.0),
    ("dob", 0xcaaf3e18f4747e02, 2, 1.0),
    ("diagnosis_code", 0xcad0face18b31baa, 42, -1.0),
    ("count", 0xb1e5e28e4479a274, 52, -1.0),
    ("avg", 0xe748a6190564632b, 43, 1.0),
    ("wait_time", 0xc346bfba1c0c944c, 12, -1.0),
    ("patient_data", 0x0e32bd86699dc41b, 27, 1.0),
    ("<num>", 0x01b53389bdccb745, 5, 1.0),
    ("<str>", 0x480e641e28b85274, 52, 1.0),
    ("(", 0xaf63a54c86018f17, 23, 1.0),
    (")", 0xaf63a44c86018d64, 36, 1.0),
    ("*", 0xaf63a74c8601927d, 61, 1.0),
    (",", 0xaf63a14c8601884b, 11, 1.0),
    (";", 0xaf63b64c8601abfa, 58, 1.0),
    ("=", 0xaf63b04c8601a1c8, 8, 1.0),
    ("group_by", 0x8c0e8443857936f8, 56, -1.0),
    ("select_zip", 0x9f3b6cb65217d365, 37, -1.0),
    ("by_zip", 0x1efe037e9905a3a8, 40, -1.0),
    ("where", 0x379d6b8893e8fc78, 56, -1.0),
    ("join", 0x41def2de29651139, 57, 1.0),
    ("on", 0x08b05807b5566370, 48, -1.0),
    ("with", 0xa66b06f655a0c2e9, 41, 1.0),
    ("over", 0xc2a38db44454a06f, 47, -1.0),
    ("partition", 0x09468996aba3e709, 9, -1.0),
    ("a", 0xaf63dc4c8601ec8c, 12, 1.0),
];
pub const Q1_RAW: [i32; 64] = [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 1, -1, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0, -1, 0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 1, -1, 0, 1, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -3, 1, 1, 0, -1, 0, 1, 0, 0, 1, 0, 0];
pub const Q1_BITS: [u64; 64] = [0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0xbfc6fd4e79325467, 0x3fc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0xbfc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0x0000000000000000, 0xbfc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0x3fc6fd4e79325467, 0x3fc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0xbfc6fd4e79325467, 0x0000000000000000, 0x3fc6fd4e79325467, 0xbfd6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0xbfe13dfadae5bf4d, 0x3fc6fd4e79325467, 0x3fc6fd4e79325467, 0x0000000000000000, 0xbfc6fd4e79325467, 0x0000000000000000, 0x3fc6fd4e79325467, 0x0000000000000000, 0x0000000000000000, 0x3fc6fd4e79325467, 0x0000000000000000, 0x0000000000000000];
pub const Q3_RAW: [i32; 64] = [2, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, -1, 1, 0, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0, -1, 0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 2, 0, 0, 0, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, -1, 1, 1, 0, -1, 0, 1, 0, 0, 1, 0, 0];
pub const Q3_BITS: [u64; 64] = [0x3fd8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0xbfc8a2345cc04426, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0xbfc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0xbfc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x3fd8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0xbfc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0xbfc8a2345cc04426, 0x3fc8a2345cc04426, 0x3fc8a2345cc04426, 0x0000000000000000, 0xbfc8a2345cc04426, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000, 0x3fc8a2345cc04426, 0x0000000000000000, 0x0000000000000000];
