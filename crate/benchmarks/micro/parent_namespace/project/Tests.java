public class Tests {
    static String show(String s) {
        return s == null ? "null" : s;
    }

    public static void main(String[] args) {
        Check.watchdog(3000);
        Check.eq("three_parts", "a.b", show(Names.parentNamespace("a.b.c")));
        Check.eq("two_parts", "goog", show(Names.parentNamespace("goog.dom")));
        Check.eq("four_parts", "x.y.z", show(Names.parentNamespace("x.y.z.w")));
        Check.eq("no_dot", "null", show(Names.parentNamespace("plain")));
        Check.eq("empty", "null", show(Names.parentNamespace("")));
        Check.done();
    }
}
