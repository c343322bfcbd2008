public class Sqrt {
    public static double sqrt(double x, double epsilon) {
        double approx = x / 2.0;
        while (Math.abs(x - approx) > epsilon) {
            approx = 0.5 * (approx + x / approx);
        }
        return approx;
    }
}
