"""
Distilling semantic changes
===========================

Two revisions of a Java file are parsed and compared member by member.
"""

from maintscope import RevisionPair, distill

before = """package demo;
public class Counter {
    private int count;
    public void increment() { count++; }
    public int get() { return count; }
}
"""

after = """package demo;
public class Counter {
    private long count;
    public void increment() { if (count < LIMIT) { count += 1; } }
    public long get() { return count; }
    public void reset() { count = 0; }
}
"""

for change in distill(RevisionPair("c1", "Counter.java", before, after)):
    print(f"{change.change_type.value:<28} {change.entity}")

# an added file reports the new class and each of its members
for change in distill(RevisionPair("c0", "Counter.java", None, before)):
    print(f"{change.change_type.value:<28} {change.entity}")
