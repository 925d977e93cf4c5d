"""FauForensics - FAU-enhanced audio-visual deepfake detection"""

__version__ = "0.1.0"
