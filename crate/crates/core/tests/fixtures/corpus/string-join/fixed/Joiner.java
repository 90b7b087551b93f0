public class Joiner {
    public static String join(String[] parts, String separator) {
        StringBuilder out = new StringBuilder();
        for (int i = 0; i < parts.length; i++) {
            if (i > 0) {
                out.append(separator);
            }
            out.append(parts[i]);
        }
        return out.toString();
    }

    public static int totalLength(String[] parts) {
        int length = 0;
        for (int i = 0; i < parts.length; i++) {
            length += parts[i].length();
        }
        return length;
    }
}
