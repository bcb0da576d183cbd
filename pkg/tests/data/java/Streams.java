package demo.func;

import java.util.List;
import java.util.stream.Collectors;

public class Streams {
    public List<Integer> squares(List<Integer> xs) {
        return xs.stream().map(x -> x * x).collect(Collectors.toList());
    }

    public long countPositive(List<Integer> xs) {
        return xs.stream().filter(x -> x > 0).count();
    }

    public List<String> names(List<Object> xs) {
        return xs.stream().map(Object::toString).collect(Collectors.toList());
    }
}
