"""Runnable scripts for table regeneration and simulation checks."""
