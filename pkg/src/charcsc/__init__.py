"""Character-level tokenization and Chinese spell checking evaluation."""

from .alignment import (
    AlignmentDiagnosis,
    CscTriple,
    EditOp,
    char_edit_script,
    diagnose_tokenization,
    repair_equal_length,
)
from .bpe import BpeModel, ModelFormatError, TokenSpan, decode, encode, load_model, load_tiktoken
from .corrector import ChannelModel, build_confusion, correct
from .lm import NgramLm, perplexity, train_lm
from .metrics import MetricsReport, SentenceJudgment, aggregate, judge, length_phonetic_stats
from .phonology import PinyinTable, Syllable, char_relation, load_pinyin_table, parse_syllable
from .surgery import (
    SurgeryConfig,
    SurgeryResult,
    apply_surgery,
    embed_prune,
    is_chinese_char,
    verify_char_level,
)

__version__ = "0.1.0"
