"""chirpscatter - desk-scale laboratory for wide-area LoRa backscatter."""
__version__ = "1.0.0"
