package demo.flow;

public class Switcher {
    public String label(int code) {
        String result;
        switch (code) {
            case 1:
                result = "one";
                break;
            case 2:
                result = "two";
                break;
            default:
                result = "many";
        }
        return result;
    }

    public int sumTo(int n) {
        int total = 0;
        for (int i = 1; i <= n; i++) {
            total += i;
        }
        return total;
    }

    public int countDown(int n) {
        int steps = 0;
        do {
            n--;
            steps++;
        } while (n > 0);
        return steps;
    }
}
