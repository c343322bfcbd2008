public class Check {
    static int failures = 0;

    /** Fails the run if it has not finished after `millis`. */
    static void watchdog(final long millis) {
        Thread t = new Thread(new Runnable() {
            public void run() {
                try {
                    Thread.sleep(millis);
                } catch (InterruptedException e) {
                    return;
                }
                System.out.println("FAIL timeout");
                System.exit(1);
            }
        });
        t.setDaemon(true);
        t.start();
    }

    static void fail(String name, String expected, String actual) {
        failures++;
        System.out.println("FAIL " + name + ": expected " + expected + ", got " + actual);
    }

    static void eq(String name, long expected, long actual) {
        if (expected != actual) {
            fail(name, "" + expected, "" + actual);
        }
    }

    static void eq(String name, boolean expected, boolean actual) {
        if (expected != actual) {
            fail(name, "" + expected, "" + actual);
        }
    }

    static void eq(String name, String expected, String actual) {
        if (!expected.equals(actual)) {
            fail(name, expected, actual);
        }
    }

    static void near(String name, double expected, double actual, double tolerance) {
        if (!(Math.abs(expected - actual) <= tolerance)) {
            fail(name, "" + expected, "" + actual);
        }
    }

    static void done() {
        if (failures > 0) {
            System.exit(1);
        }
        System.out.println("OK");
        System.exit(0);
    }
}
