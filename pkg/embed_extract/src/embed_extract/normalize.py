"""Text normalization and content ids.

These rules define how a document row becomes a stable 64-bit id, and
they must match the classifier side byte for byte, because ids are the
join key between a corpus CSV and an embedding table: unicode lowercase,
collapse whitespace runs to single spaces, then FNV-1a over the UTF-8
bytes of the normalized text.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def normalize_text(text: str) -> str:
    return " ".join(text.lower().split())


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


def doc_id(text: str) -> int:
    return fnv1a_64(text.encode("utf-8"))
