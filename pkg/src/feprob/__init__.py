"""Relative accuracy of Lagrange P_k finite elements, in probability."""
