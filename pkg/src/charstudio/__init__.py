"""charstudio: desk-scale GAN studio for character concept co-creation."""

__version__ = "0.1.0"
