public class Numbers {
    public static boolean isSimpleNumber(String s) {
        int len = s.length();
        for (int index = 0; index < len; index++) {
            char c = s.charAt(index);
            if (c < '0' || c > '9') {
                return false;
            }
        }
        return len > 0;
    }
}
