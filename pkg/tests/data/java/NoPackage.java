class NoPackage {
    int x, y[];
    static int twice(int v) { return v + v; }
    void varargs(String... parts) { for (String p : parts) { System.out.println(p); } }
}
