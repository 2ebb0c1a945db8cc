"""Frequency map analysis: high-precision quasiperiodic decomposition of sampled signals."""
