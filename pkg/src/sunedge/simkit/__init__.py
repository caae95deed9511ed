"""Scenario configuration, simulation loop, metrics and export."""
