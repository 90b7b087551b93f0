public class Clamp {
    public static int clamp(int value, int low, int high) {
        if (value < low) {
            return low;
        }
        if (value > high) {
            return high;
        }
        return value;
    }

    public static int distance(int a, int b) {
        int diff = a - b;
        if (diff < 0) {
            diff = -diff;
        }
        return diff;
    }
}
