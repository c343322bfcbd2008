public class Zero {
    public static boolean eitherZero(int u, int v) {
        if (u * v == 0) {
            return true;
        }
        return false;
    }
}
