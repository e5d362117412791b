"""kanhope: benchmarking toolkit for hope-speech classification on
code-mixed Kannada-English text.

Pipeline stages: corpus loading/splitting, cleaning and code-mixing
profiles, annotation agreement, TF-IDF features, five classical
classifiers, a dual-channel fusion classifier, and evaluation reports
with figures. See the CLI (`kanhope --help`) for the end-to-end surface.
"""

__version__ = "0.1.0"
