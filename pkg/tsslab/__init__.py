"""
tsslab - Topological Sample Selection for node classification under label noise.
Personalized-PageRank class-conditional betweenness, curriculum-paced confident
node extraction and a from-scratch two-layer GCN trainer.
"""

__version__ = "1.0.0"
__author__ = "tsslab Team"
