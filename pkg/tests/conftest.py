import re

from candyspan import AnnotatedComment, CandyType, Comment, SpanAnnotation
from candyspan.biocodec import TokenOffset

TYPES = list(CandyType)


def whitespace_tokens(text: str) -> list[TokenOffset]:
    """Simple whitespace tokenizer used as an independent offset oracle."""
    return [
        TokenOffset(i, match.start(), match.end())
        for i, match in enumerate(re.finditer(r"\S+", text))
    ]


def make_comment(document, comment_id, text, spans=(), is_candy=None, replica=0):
    span_objs = tuple(
        sorted(
            (SpanAnnotation(start, end, candy_type) for start, end, candy_type in spans),
            key=lambda s: (s.start, s.end, s.candy_type.order),
        )
    )
    if is_candy is None:
        is_candy = bool(span_objs)
    return AnnotatedComment(Comment(document, comment_id, text), is_candy, span_objs, replica)
