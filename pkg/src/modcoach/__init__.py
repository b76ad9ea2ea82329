"""Voice-modulation training engine.

Labels pause/volume/pitch/speed techniques in word-timed speech, mines
frequent technique combinations from a benchmark corpus, and streams
quantitative feedback during practice.
"""

__version__ = "0.1.0"
