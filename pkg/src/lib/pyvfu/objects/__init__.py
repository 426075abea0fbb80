"""
The objects package contains the definitions of the data structures:
models and gradients, datasets and splits, the VFL protocol structures,
unlearning requests and reports, and the execution settings.
"""
