public class Counter {
    public static int countEqual(int[] values, int target) {
        int count = 0;
        for (int i = 0; i < values.length; i++) {
            if (values[i] == target) {
                count++;
            }
        }
        return count;
    }

    public static int firstIndex(int[] values, int target) {
        int index = -1;
        for (int i = values.length - 1; i >= 0; i--) {
            if (target == values[i]) {
                index = i;
            }
        }
        return index;
    }
}
