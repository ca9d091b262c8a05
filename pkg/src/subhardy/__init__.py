"""Numerical verification of sharp L^p Hardy and Rellich inequalities for sums of squares of vector fields."""
