# Shared models and utilities for the tensor field network library
