"""Configuration, I/O, logging and parallel helpers."""
