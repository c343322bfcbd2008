public class Tests {
    public static void main(String[] args) {
        Check.watchdog(3000);
        Check.eq("none", 0, Counter.countMatches(new int[] {1, 2, 3}, 9));
        Check.eq("one", 1, Counter.countMatches(new int[] {1, 2, 3}, 2));
        Check.eq("three", 3, Counter.countMatches(new int[] {4, 1, 4, 4}, 4));
        Check.eq("empty", 0, Counter.countMatches(new int[] {}, 4));
        Check.done();
    }
}
