"""Physical layer: chirp math, forward error correction, framing and synthesis."""
