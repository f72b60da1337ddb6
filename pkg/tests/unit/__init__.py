"""Unit tests for ergoscope."""