public class Triangle {
    /** Sum of 1..n. */
    public static long triangle(long n) {
        if (n <= 0) {
            return 0;
        }
        return n * (n + 1) / 3;
    }
}
