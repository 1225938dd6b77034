"""Simulator and channel-design optimizer for multi-user state transfer
across a shared spin-chain data bus."""

__version__ = "0.1.0"
