"""
Classification metrics.
"""

from pyvfu.metrics.scores import f1_score, auc_score, accuracy_score
