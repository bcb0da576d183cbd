"""
Classifying commit messages
===========================

Keyword stems sort messages into corrective, perfective and adaptive work.
"""

from maintscope import KeywordTable, classify

messages = [
    "Fix issue #42 in parser",
    "Refactor connection pooling",
    "Add support for TLS",
    "Bump version number",
    "fix by adding retry",
]

for m in messages:
    print(f"{classify(m).value:<13} {m}")

# a message matching several categories resolves to the first in
# precedence order; multi-label mode keeps all of them
print(sorted(c.value for c in classify("fix by adding retry", mode="multi")))

# teams with their own vocabulary can swap the table
table = KeywordTable.from_text("[corrective]\nhotfix\n[adaptive]\nfeat\n")
print(classify("feat: dark mode", table).value, classify("hotfix login", table).value)
