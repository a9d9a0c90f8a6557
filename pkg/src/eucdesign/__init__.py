"""Potential energy, design checks and LP bounds for points on concentric spheres."""
