"""
Sorted first-order logic shared by every stage: syntax, structures,
evaluation, substitution and printing.
"""
