"""tsirelson - Tsirelson-type norms, norming-set certificates and stabilization experiments."""
