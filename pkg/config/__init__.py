"""Configuration sections and file readers for the traffic shaper"""
