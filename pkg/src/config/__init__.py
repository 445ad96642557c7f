"""Configuration module for experiment, tileset and level schemas."""
