"""Configuration loading, artifact writing and logging."""
