"""Tests for the nb_trials package."""
