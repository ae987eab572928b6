"""Qualitative solving of stochastic parity games, explicit and over lossy channel systems."""
