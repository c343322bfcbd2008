import java.util.List;

public class Coverage {
    private int[] data = new int[4];
    private String label = "none";

    int describe(Object o, List items, String s, int a, int b) {
        String t = (String) o;
        if (a > 0 && s != null) {
            a = a + b * 2;
        }
        int x = data[a];
        s.trim();
        items.add(t, s);
        for (int i = 0; i < a; i++) {
            items.add(s);
        }
        x += a;
        boolean done = !items.isEmpty();
        return x + 1;
    }
}
