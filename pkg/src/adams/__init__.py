"""The 2-primary Adams E2 page from the Lambda algebra, Massey products, and
differential deduction on Adams charts."""

__version__ = "0.1.0"
