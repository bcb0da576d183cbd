package demo.nest;

public class Outer {
    private int value = 1;

    public class Inner {
        public int doubled() {
            return value * 2;
        }
    }

    public static class Helper {
        static int triple(int x) {
            return 3 * x;
        }
    }

    public Inner makeInner() {
        return new Inner();
    }
}
