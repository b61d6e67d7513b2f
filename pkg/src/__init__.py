"""FedHAP Simulator - Federated hashing with adversarial global prototypes."""

__version__ = "1.0.0"
__author__ = "FedHAP Simulator Team"
