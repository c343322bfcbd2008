public class Namespace {
    /** "a.b.c" -> "c". */
    public static String lastSegment(String namespace) {
        int indexOfDot = namespace.lastIndexOf('.');
        if (indexOfDot == -1) {
            return namespace;
        }
        return namespace.substring(indexOfDot + 1);
    }

    public static boolean isQualified(String namespace) {
        return namespace.contains(".");
    }
}
