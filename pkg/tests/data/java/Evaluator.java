package demo.ast;

public class Evaluator implements Visitor<Integer> {
    @Override
    public Integer visitNumber(int value) {
        return value;
    }

    @Override
    public Integer visitAdd(Visitor.Node left, Visitor.Node right) {
        return left.accept(this) + right.accept(this);
    }
}
