"""Tests package for chirpscatter."""
