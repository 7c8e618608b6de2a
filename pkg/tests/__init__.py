"""Tests for civforge"""
