"""Stochastic game solver - strategy improvement for concurrent and turn-based safety and reachability games."""
