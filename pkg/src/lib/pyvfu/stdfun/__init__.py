"""
Standard functions: experiment orchestration and comparison of runs.
"""
