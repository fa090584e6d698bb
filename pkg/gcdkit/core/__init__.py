"""Configuration, constants and errors"""
