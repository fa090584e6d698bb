"""Coding, decoding and simulation services"""
