"""Latent-space counterfactual grading on a synthetic corpus.

Pipeline: generate a graded corpus, train a small diffusion autoencoder,
probe its semantic latent space with linear classifiers, calibrate
hyperplane distance to a continuous grade, and generate counterfactual
images by steering latents across the decision boundary.
"""

__version__ = "0.1.0"
