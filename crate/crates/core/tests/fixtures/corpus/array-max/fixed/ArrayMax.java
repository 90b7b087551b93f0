public class ArrayMax {
    public static int max(int[] values) {
        int best = values[0];
        for (int i = 1; i < values.length; i++) {
            if (values[i] > best) {
                best = values[i];
            }
        }
        return best;
    }

    public static boolean contains(int[] values, int target) {
        boolean found = false;
        for (int i = 0; i < values.length; i++) {
            if (values[i] == target) {
                found = true;
            }
        }
        return found;
    }
}
