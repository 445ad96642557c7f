"""Core module for levels, generation, perception, agents and evaluation."""
