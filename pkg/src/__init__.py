# Fast null LDA package
__version__ = "1.0.0"
__author__ = "nulllda developers"
__description__ = "Null-space linear discriminant analysis with a-priori full-rank certificates"
