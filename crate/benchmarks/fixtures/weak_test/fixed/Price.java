public class Price {
    public static int price(int base, int bonus) {
        int total = base;
        total = total + bonus;
        return total;
    }
}
