"""mfslab: exact construction and verification of Frobenius filtrations and
mixed Frobenius structures, including local quantum cohomology examples."""

__version__ = "0.1.0"
