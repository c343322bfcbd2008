public class Flags {
    private static final int READ = 1;
    private static final int WRITE = 2;
    private static final int EXEC = 4;
    private int mask;
    private boolean locked = false;

    public int grant(int bits) {
        if (locked) {
            return mask;
        }
        mask |= bits;
        return mask;
    }

    public int revoke(int bits) {
        mask &= ~bits;
        return mask;
    }

    public boolean canRead() {
        return (mask & READ) != 0;
    }

    public boolean canWrite() {
        return (mask & WRITE) != 0 && !locked;
    }

    public int shifted(int by) {
        return (mask << by) ^ (EXEC >> 1);
    }

    public void lock() {
        locked = true;
    }

    public String summary() {
        StringBuilder sb = new StringBuilder();
        sb.append(canRead() ? 'r' : '-');
        sb.append(canWrite() ? 'w' : '-');
        return sb.toString();
    }
}
