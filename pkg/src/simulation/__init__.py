"""Experiment drivers: PER sweeps, range scenarios, TDMA and concurrency."""
