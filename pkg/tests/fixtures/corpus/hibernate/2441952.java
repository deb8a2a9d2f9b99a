@Entity
@Table(name = "accounts")
public class Account {
    private Long id;
}
