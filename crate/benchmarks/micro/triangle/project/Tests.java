public class Tests {
    public static void main(String[] args) {
        Check.watchdog(3000);
        Check.eq("t0", 0, Triangle.triangle(0));
        Check.eq("t1", 1, Triangle.triangle(1));
        Check.eq("t2", 3, Triangle.triangle(2));
        Check.eq("t4", 10, Triangle.triangle(4));
        Check.eq("t10", 55, Triangle.triangle(10));
        Check.eq("t100", 5050, Triangle.triangle(100));
        Check.eq("negative", 0, Triangle.triangle(-4));
        Check.done();
    }
}
