"""Arabic text-to-speech pipeline: normalization, diacritization,
segmentation, synthesis backends, evaluation, and serving.

The package splits along the pipeline stages:

    normalizer   digits, dates, fractions, abbreviations -> Arabic words
    diacritizer  short-vowel restoration via pluggable backends
    segmenter    silence-based corpus segmentation
    synth        mel-spectrogram synthesis and vocoding
    evaluation   WER / CER / RTF metrics
    mos          listening-study bookkeeping
    service      HTTP API over the pipeline
    cli          command-line front door for all of the above
"""

__version__ = "0.1.0"
