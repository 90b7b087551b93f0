public class Validator {
    public static void requirePositive(int value) {
        if (value <= 0) {
            throw new IllegalArgumentException("not positive: " + value);
        }
    }

    public static int area(int width, int height) {
        requirePositive(width);
        requirePositive(height);
        return width + height;
    }
}
