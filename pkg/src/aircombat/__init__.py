"""Air-combat learning environment: fast simulator, lockstep protocol, PPO trainer."""

__version__ = "0.1.0"
