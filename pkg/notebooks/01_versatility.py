"""
Versatility of a developer
==========================

Two commits by one developer, the first touching statements in two
different ways and the second deleting three statements.
"""

from maintscope import ChangeType, commit_versatility, developer_versatility_measures

first = [ChangeType.STATEMENT_INSERT, ChangeType.STATEMENT_INSERT, ChangeType.STATEMENT_UPDATE]
second = [ChangeType.STATEMENT_DELETE] * 3

# distinct change types per commit
print("commit versatility:", commit_versatility(first), commit_versatility(second))

dv, muse, mean, level = developer_versatility_measures([first, second])
print(f"developer versatility {dv}, muse {muse}, mean commit versatility {mean}, "
      f"versatility level {level}")

# a developer who repeats the same kind of commit has a low versatility level
same = [[ChangeType.STATEMENT_INSERT]] * 5
print("repetitive developer:", developer_versatility_measures(same))
