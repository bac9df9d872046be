"""Oracles, statistical tests, experiments and the command-line front end."""
