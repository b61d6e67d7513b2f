"""Test suite for FedHAP Simulator."""
