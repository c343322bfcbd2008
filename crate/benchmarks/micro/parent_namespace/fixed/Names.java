public class Names {
    /** "a.b.c" -> "a.b"; names without a dot have no parent. */
    public static String parentNamespace(String name) {
        if (name == null || name.length() == 0) {
            return null;
        }
        int idx = name.lastIndexOf('.');
        if (idx < 0) {
            return null;
        }
        return name.substring(0, idx);
    }
}
