public class Counter {
    public static int countMatches(int[] xs, int target) {
        int count = 0;
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == target) {
                count++;
                count++;
            }
        }
        return count;
    }
}
