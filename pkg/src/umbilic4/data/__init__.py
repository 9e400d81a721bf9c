"""Shipped tableau data"""
